//! Experiment configuration: a flat `key = value` format with `[section]`
//! headers and `#` comments.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use mvtorus::calculus::{CoefficientFamily, Control, ControlDictionary, EikonalFamily, MomentFamily};
use mvtorus::dynamics::SimulationConfig;
use mvtorus::metrics::SobolevWeight;
use mvtorus::torus::{read_measure, FourierTable, GridDensity, TorusMeasure};
use mvtorus::value::{PeriodicLookup, SearchConfig};
use mvtorus::{Error, Result};

/// One term of a real trigonometric polynomial.
#[derive(Clone, Debug, PartialEq)]
pub enum TrigTerm {
    Const(f64),
    Cos { amp: f64, k: Vec<i64> },
    Sin { amp: f64, k: Vec<i64> },
}

/// `term; term; ...` with terms `const c`, `cos c k1 [k2 k3]` and
/// `sin c k1 [k2 k3]` (meaning `c·cos(k·x)` and `c·sin(k·x)`).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrigPolynomial {
    pub terms: Vec<TrigTerm>,
}

impl TrigPolynomial {
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut terms = Vec::new();
        for raw in text.split(';').map(str::trim).filter(|t| !t.is_empty()) {
            let mut parts = raw.split_whitespace();
            let kind = parts.next().unwrap_or_default();
            let amp: f64 = parts
                .next()
                .ok_or_else(|| format!("term `{raw}` is missing its coefficient"))?
                .parse()
                .map_err(|_| format!("bad coefficient in `{raw}`"))?;
            let k = parts.map(|v| v.parse::<i64>().map_err(|_| format!("bad wave number in `{raw}`"))).collect::<std::result::Result<Vec<_>, _>>()?;
            terms.push(match kind {
                "const" if k.is_empty() => TrigTerm::Const(amp),
                "cos" | "sin" if !k.is_empty() && k.len() <= 3 => {
                    if kind == "cos" {
                        TrigTerm::Cos { amp, k }
                    } else {
                        TrigTerm::Sin { amp, k }
                    }
                }
                _ => return Err(format!("unrecognized term `{raw}`")),
            });
        }
        Ok(TrigPolynomial { terms })
    }

    /// Dimension implied by the wave vectors, if any.
    pub fn dim(&self) -> Option<usize> {
        self.terms.iter().find_map(|t| match t {
            TrigTerm::Cos { k, .. } | TrigTerm::Sin { k, .. } => Some(k.len()),
            TrigTerm::Const(_) => None,
        })
    }

    pub fn to_table(&self, dim: usize) -> Result<FourierTable<f64>> {
        let mut parts = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            parts.push(match t {
                TrigTerm::Const(c) => FourierTable::constant(dim, *c)?,
                TrigTerm::Cos { k, .. } | TrigTerm::Sin { k, .. } if k.len() != dim => {
                    return Err(Error::DimensionMismatch { expected: dim, found: k.len() });
                }
                TrigTerm::Cos { amp, k } => FourierTable::cosine(dim, k, *amp)?,
                TrigTerm::Sin { amp, k } => FourierTable::sine(dim, k, *amp)?,
            });
        }
        let cutoff = parts.iter().map(|p| p.cutoff()).max().unwrap_or(1);
        let mut total = FourierTable::zeros(dim, cutoff)?;
        for p in parts {
            total = total.combine(1.0, &p.with_cutoff(cutoff), 1.0)?;
        }
        Ok(total)
    }
}

impl fmt::Display for TrigPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|t| {
                let ks = |k: &[i64]| k.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
                match t {
                    TrigTerm::Const(c) => format!("const {c}"),
                    TrigTerm::Cos { amp, k } => format!("cos {amp} {}", ks(k)),
                    TrigTerm::Sin { amp, k } => format!("sin {amp} {}", ks(k)),
                }
            })
            .collect();
        f.write_str(&parts.join("; "))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FamilySpec {
    Zero { dim: usize },
    Frozen { dim: usize, cost: f64 },
    Kuramoto { kappa: f64, sigma: f64 },
    Eikonal { potential: TrigPolynomial, nodes: usize, sigma: f64 },
}

/// Object-safe view of a built family.
pub type DynFamily = dyn CoefficientFamily<f64> + Sync;

impl FamilySpec {
    pub fn dim(&self) -> usize {
        match self {
            FamilySpec::Zero { dim } | FamilySpec::Frozen { dim, .. } => *dim,
            FamilySpec::Kuramoto { .. } | FamilySpec::Eikonal { .. } => 1,
        }
    }

    pub fn build(&self) -> Result<Box<DynFamily>> {
        Ok(match self {
            FamilySpec::Zero { dim } => Box::new(MomentFamily::zero(*dim)),
            FamilySpec::Frozen { dim, cost } => Box::new(MomentFamily::frozen(*dim, *cost)),
            FamilySpec::Kuramoto { kappa, sigma } => Box::new(MomentFamily::kuramoto(*kappa, *sigma)?),
            FamilySpec::Eikonal { .. } => Box::new(self.build_eikonal()?.expect("matched eikonal")),
        })
    }

    /// The concrete family for the Eikonal variant.
    pub fn build_eikonal(&self) -> Result<Option<EikonalFamily<f64>>> {
        match self {
            FamilySpec::Eikonal { potential, nodes, sigma } => Ok(Some(EikonalFamily::new(potential_lookup(potential, *nodes)?, *sigma))),
            _ => Ok(None),
        }
    }
}

/// Samples a one-dimensional trigonometric polynomial on `nodes` points.
pub fn potential_lookup(potential: &TrigPolynomial, nodes: usize) -> Result<PeriodicLookup<f64>> {
    let table = potential.to_table(1)?;
    PeriodicLookup::from_fn(nodes, |y| table.evaluate(&[y]))
}

#[derive(Clone, Debug, PartialEq)]
pub enum DictionarySpec {
    /// `count` equally spaced scalar constants on `[lo, hi]`.
    Grid { lo: f64, hi: f64, count: usize },
    /// Explicit constant controls.
    List { values: Vec<Vec<f64>> },
}

impl DictionarySpec {
    pub fn build(&self, state_dim: usize) -> Result<ControlDictionary<f64>> {
        match self {
            DictionarySpec::Grid { lo, hi, count } => Ok(ControlDictionary::constant_grid(*lo, *hi, *count)),
            DictionarySpec::List { values } => {
                let c0 = values.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
                ControlDictionary::new(values.iter().map(|v| Control::Constant(v.clone())).collect(), c0, state_dim)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialSpec {
    Dirac(Vec<f64>),
    /// Uniform density on a grid with `nodes` cells per axis.
    Uniform { dim: usize, nodes: usize },
    File(PathBuf),
}

impl InitialSpec {
    /// Relative file paths are resolved against `base`.
    pub fn build(&self, base: &Path) -> Result<TorusMeasure<f64>> {
        match self {
            InitialSpec::Dirac(x) => TorusMeasure::dirac(x),
            InitialSpec::Uniform { dim, nodes } => Ok(GridDensity::uniform(vec![*nodes; *dim])?.into()),
            InitialSpec::File(p) => read_measure(&base.join(p)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub id: String,
    pub seed: u64,
    pub output: PathBuf,
    pub family: FamilySpec,
    pub dictionary: DictionarySpec,
    pub initial: InitialSpec,
    pub particles: usize,
    pub dt: f64,
    pub start: f64,
    pub end: f64,
    /// Sobolev order; `None` means `n_*`.
    pub lambda: Option<f64>,
    pub cutoff: usize,
    pub reps: usize,
    pub depth: usize,
    pub node_budget: usize,
}

impl ExperimentConfig {
    pub fn simulation(&self) -> Result<SimulationConfig<f64>> {
        SimulationConfig::new(self.particles, self.dt, self.start, self.end, self.seed)
    }

    pub fn search(&self) -> Result<SearchConfig<f64>> {
        let mut cfg = SearchConfig::new(self.simulation()?, self.reps, self.depth)?;
        cfg.node_budget = self.node_budget;
        Ok(cfg)
    }

    pub fn weight(&self) -> Result<SobolevWeight<f64>> {
        match self.lambda {
            Some(l) => SobolevWeight::new(l, self.family.dim()),
            None => SobolevWeight::star(self.family.dim()),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = Document::parse(text)?;
        let cfg = ExperimentConfig::from_document(&mut doc)?;
        doc.finish()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        ExperimentConfig::parse(&std::fs::read_to_string(path)?)
    }

    fn from_document(doc: &mut Document) -> Result<Self> {
        let id = doc.required("experiment", "id")?.1;
        let seed = doc.parsed("experiment", "seed")?;
        let output = PathBuf::from(doc.optional("experiment", "output").map(|v| v.1).unwrap_or_else(|| "runs".into()));
        let family = match doc.required("family", "kind")?.1.as_str() {
            "zero" => FamilySpec::Zero { dim: doc.parsed("family", "dim")? },
            "frozen" => FamilySpec::Frozen { dim: doc.parsed("family", "dim")?, cost: doc.parsed("family", "cost")? },
            "kuramoto" => FamilySpec::Kuramoto { kappa: doc.parsed("family", "kappa")?, sigma: doc.parsed("family", "sigma")? },
            "eikonal" => {
                let (line, text) = doc.required("family", "potential")?;
                let potential = TrigPolynomial::parse(&text).map_err(|msg| Error::Parse { line, msg })?;
                let nodes = doc.optional_parsed("family", "nodes")?.unwrap_or(4096);
                FamilySpec::Eikonal { potential, nodes, sigma: doc.parsed("family", "sigma")? }
            }
            other => return Err(doc.error("family", "kind", format!("unknown family `{other}`"))),
        };
        let dictionary = match doc.required("dictionary", "kind")?.1.as_str() {
            "grid" => DictionarySpec::Grid {
                lo: doc.parsed("dictionary", "lo")?,
                hi: doc.parsed("dictionary", "hi")?,
                count: doc.parsed("dictionary", "count")?,
            },
            "list" => {
                let (line, text) = doc.required("dictionary", "values")?;
                let values = text
                    .split(';')
                    .map(|entry| entry.split_whitespace().map(str::parse::<f64>).collect::<std::result::Result<Vec<_>, _>>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| Error::Parse { line, msg: format!("bad control value: {e}") })?;
                DictionarySpec::List { values }
            }
            other => return Err(doc.error("dictionary", "kind", format!("unknown dictionary `{other}`"))),
        };
        let initial = match doc.required("initial", "kind")?.1.as_str() {
            "dirac" => {
                let (line, text) = doc.required("initial", "point")?;
                let x = text
                    .split_whitespace()
                    .map(str::parse::<f64>)
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| Error::Parse { line, msg: format!("bad coordinate: {e}") })?;
                InitialSpec::Dirac(x)
            }
            "uniform" => InitialSpec::Uniform { dim: doc.parsed("initial", "dim")?, nodes: doc.parsed("initial", "nodes")? },
            "file" => InitialSpec::File(PathBuf::from(doc.required("initial", "path")?.1)),
            other => return Err(doc.error("initial", "kind", format!("unknown initial law `{other}`"))),
        };
        Ok(ExperimentConfig {
            id,
            seed,
            output,
            family,
            dictionary,
            initial,
            particles: doc.parsed("simulation", "particles")?,
            dt: doc.parsed("simulation", "dt")?,
            start: doc.optional_parsed("simulation", "start")?.unwrap_or(0.0),
            end: doc.optional_parsed("simulation", "end")?.unwrap_or(1.0),
            lambda: doc.optional_parsed("metric", "lambda")?,
            cutoff: doc.optional_parsed("metric", "cutoff")?.unwrap_or(64),
            reps: doc.optional_parsed("search", "reps")?.unwrap_or(8),
            depth: doc.optional_parsed("search", "depth")?.unwrap_or(2),
            node_budget: doc.optional_parsed("search", "node_budget")?.unwrap_or(1 << 20),
        })
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        let _ = writeln!(s, "[experiment]\nid = {}\nseed = {}\noutput = {}\n", self.id, self.seed, self.output.display());
        let _ = writeln!(s, "[family]");
        let _ = match &self.family {
            FamilySpec::Zero { dim } => writeln!(s, "kind = zero\ndim = {dim}"),
            FamilySpec::Frozen { dim, cost } => writeln!(s, "kind = frozen\ndim = {dim}\ncost = {cost}"),
            FamilySpec::Kuramoto { kappa, sigma } => writeln!(s, "kind = kuramoto\nkappa = {kappa}\nsigma = {sigma}"),
            FamilySpec::Eikonal { potential, nodes, sigma } => {
                writeln!(s, "kind = eikonal\npotential = {potential}\nnodes = {nodes}\nsigma = {sigma}")
            }
        };
        let _ = writeln!(s, "\n[dictionary]");
        let _ = match &self.dictionary {
            DictionarySpec::Grid { lo, hi, count } => writeln!(s, "kind = grid\nlo = {lo}\nhi = {hi}\ncount = {count}"),
            DictionarySpec::List { values } => {
                let entries: Vec<String> = values.iter().map(|v| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")).collect();
                writeln!(s, "kind = list\nvalues = {}", entries.join("; "))
            }
        };
        let _ = writeln!(s, "\n[initial]");
        let _ = match &self.initial {
            InitialSpec::Dirac(x) => {
                writeln!(s, "kind = dirac\npoint = {}", x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "))
            }
            InitialSpec::Uniform { dim, nodes } => writeln!(s, "kind = uniform\ndim = {dim}\nnodes = {nodes}"),
            InitialSpec::File(p) => writeln!(s, "kind = file\npath = {}", p.display()),
        };
        let _ = writeln!(
            s,
            "\n[simulation]\nparticles = {}\ndt = {}\nstart = {}\nend = {}",
            self.particles, self.dt, self.start, self.end
        );
        let _ = writeln!(s, "\n[metric]");
        if let Some(l) = self.lambda {
            let _ = writeln!(s, "lambda = {l}");
        }
        let _ = writeln!(s, "cutoff = {}", self.cutoff);
        let _ = write!(s, "\n[search]\nreps = {}\ndepth = {}\nnode_budget = {}\n", self.reps, self.depth, self.node_budget);
        f.write_str(&s)
    }
}

/// Parsed `section -> key -> (line, value)` with tracking of which keys
/// were consumed, so that unknown keys can be rejected.
struct Document {
    entries: BTreeMap<(String, String), (usize, String)>,
    used: std::collections::BTreeSet<(String, String)>,
}

impl Document {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                section = Some(name.trim().to_string());
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse { line, msg: format!("expected `key = value`, got `{content}`") })?;
            let sec = section.clone().ok_or_else(|| Error::Parse { line, msg: "key outside of a section".into() })?;
            let k = (sec, key.trim().to_string());
            if entries.insert(k.clone(), (line, value.trim().to_string())).is_some() {
                return Err(Error::Parse { line, msg: format!("duplicate key `{}` in [{}]", k.1, k.0) });
            }
        }
        Ok(Document { entries, used: Default::default() })
    }

    fn optional(&mut self, section: &str, key: &str) -> Option<(usize, String)> {
        let k = (section.to_string(), key.to_string());
        let v = self.entries.get(&k).cloned();
        if v.is_some() {
            self.used.insert(k);
        }
        v
    }

    fn required(&mut self, section: &str, key: &str) -> Result<(usize, String)> {
        self.optional(section, key).ok_or_else(|| Error::Parse { line: 0, msg: format!("missing `{key}` in [{section}]") })
    }

    fn optional_parsed<T: std::str::FromStr>(&mut self, section: &str, key: &str) -> Result<Option<T>> {
        match self.optional(section, key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|_| Error::Parse { line, msg: format!("cannot parse `{key}` = `{v}`") }),
        }
    }

    fn parsed<T: std::str::FromStr>(&mut self, section: &str, key: &str) -> Result<T> {
        self.optional_parsed(section, key)?.ok_or_else(|| Error::Parse { line: 0, msg: format!("missing `{key}` in [{section}]") })
    }

    fn error(&self, section: &str, key: &str, msg: String) -> Error {
        let line = self.entries.get(&(section.to_string(), key.to_string())).map_or(0, |e| e.0);
        Error::Parse { line, msg }
    }

    fn finish(self) -> Result<()> {
        for (k, (line, _)) in &self.entries {
            if !self.used.contains(k) {
                return Err(Error::Parse { line: *line, msg: format!("unknown key `{}` in [{}]", k.1, k.0) });
            }
        }
        Ok(())
    }
}
