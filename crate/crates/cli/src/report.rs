//! The analysis pipeline and its report sections.

use serde::Serialize;
use serde_json::{Map, Value};

use ptbundle::farey::{build_strip, minimal_paths_capped, EdgePath};
use ptbundle::sl2z::{rl_factorize, MatSL2, Slope, TwistWord};
use ptbundle::surfaces::{build_surface, GutsReport, Parity, Sidedness};
use ptbundle::triangulation::{
    build_layered_triangulation, solve_geometric, v3, volume_with_tolerance, EdgeClass,
    VolumeResult, BOUND_TOLERANCE, SOLVER_TOLERANCE,
};

use crate::error::CliError;
use crate::input::Input;

pub const DEFAULT_MAX_PATHS: usize = 64;
pub const TOLERANCE_ENV: &str = "PTB_TOLERANCE";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceSource {
    Default,
    Flag,
    Environment,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Settings {
    pub solver: f64,
    pub bound: f64,
    pub max_paths: usize,
    pub source: ToleranceSource,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            solver: SOLVER_TOLERANCE,
            bound: BOUND_TOLERANCE,
            max_paths: DEFAULT_MAX_PATHS,
            source: ToleranceSource::Default,
        }
    }
}

impl Settings {
    /// The flag wins over the environment, which wins over the default.
    pub fn resolve(
        flag: Option<f64>,
        env: Option<&str>,
        max_paths: Option<usize>,
    ) -> Result<Settings, CliError> {
        let mut s = Settings::default();
        if let Some(cap) = max_paths {
            s.max_paths = cap;
        }
        let parsed_env = match env.map(str::trim).filter(|v| !v.is_empty()) {
            Some(v) => Some(v.parse::<f64>().map_err(|_| {
                CliError::Usage(format!("{TOLERANCE_ENV}=`{v}` is not a number"))
            })?),
            None => None,
        };
        let (tol, source) = match (flag, parsed_env) {
            (Some(t), _) => (t, ToleranceSource::Flag),
            (None, Some(t)) => (t, ToleranceSource::Environment),
            (None, None) => return Ok(s),
        };
        if !(tol.is_finite() && tol > 0.0) {
            return Err(CliError::Usage(format!("tolerance must be positive, got {tol}")));
        }
        s.solver = tol;
        s.source = source;
        Ok(s)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

pub const TOOL: Tool = Tool {
    name: "ptbundle",
    version: env!("CARGO_PKG_VERSION"),
};

#[derive(Clone, Debug, Serialize)]
pub struct InputSummary {
    pub kind: &'static str,
    pub matrix: MatSL2,
    pub trace: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct WordSummary {
    pub sign: i8,
    pub syllables: Vec<(u64, u64)>,
    pub n: u64,
    pub text: String,
}

impl WordSummary {
    fn of(w: &TwistWord) -> WordSummary {
        WordSummary {
            sign: w.sign(),
            syllables: w.syllables().to_vec(),
            n: w.len(),
            text: w.to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorSection {
    pub sign: i8,
    pub word: WordSummary,
    /// `G` with `G · word · G⁻¹` equal to the input matrix.
    pub conjugator: MatSL2,
    /// `rl_factorize` for matrix input, `given` for word input.
    pub source: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct StripSection {
    pub n: usize,
    pub triangle_count: usize,
    pub triangles: Vec<[Slope; 3]>,
    pub quotient_vertices: usize,
    pub quotient_edges: usize,
    pub path_count: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CellCounts {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DoubleSummary {
    pub chi: i64,
    pub sidedness: Sidedness,
    pub cells: CellCounts,
}

#[derive(Clone, Debug, Serialize)]
pub struct SurfaceSummary {
    pub path: usize,
    pub vertices: Vec<Slope>,
    pub k: usize,
    pub parity: Parity,
    /// χ of the stacked saddle complex `S`.
    pub chi: i64,
    pub sidedness: Sidedness,
    pub boundary_components: usize,
    pub cells: CellCounts,
    /// For odd `k`, the boundary of a regular neighbourhood of `S`.
    pub double: Option<DoubleSummary>,
    /// χ of `S_γ`: `chi` when two-sided, the double's otherwise.
    pub chi_s_gamma: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GutsEntry {
    pub path: usize,
    pub vertices: Vec<Slope>,
    pub report: GutsReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct TriangulationSection {
    pub n: usize,
    pub edge_class_count: usize,
    /// Each class as `[tetrahedron, slot]` pairs.
    pub edge_classes: Vec<Vec<[usize; 2]>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GeometrySection {
    pub angles: Vec<[f64; 3]>,
    pub shapes: Vec<[f64; 2]>,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct VolumeSection {
    #[serde(flatten)]
    pub result: VolumeResult,
    pub v3: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub tool: Tool,
    pub input: InputSummary,
    pub tolerances: Settings,
    pub notes: Vec<String>,
    pub factorization: FactorSection,
    pub strip: StripSection,
    pub surfaces: Vec<SurfaceSummary>,
    pub guts: Vec<GutsEntry>,
    pub triangulation: TriangulationSection,
    pub geometry: GeometrySection,
    pub volume: VolumeSection,
}

/// Report sections, named as in the JSON document.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Section {
    Factorization,
    Strip,
    Surfaces,
    Guts,
    Triangulation,
    Geometry,
    Volume,
}

impl Section {
    pub const ALL: [Section; 7] = [
        Section::Factorization,
        Section::Strip,
        Section::Surfaces,
        Section::Guts,
        Section::Triangulation,
        Section::Geometry,
        Section::Volume,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Section::Factorization => "factorization",
            Section::Strip => "strip",
            Section::Surfaces => "surfaces",
            Section::Guts => "guts",
            Section::Triangulation => "triangulation",
            Section::Geometry => "geometry",
            Section::Volume => "volume",
        }
    }
}

/// Computes only what the requested sections need; values agree with the
/// corresponding parts of a full analysis.
pub struct Pipeline {
    input: Input,
    settings: Settings,
    factorization: FactorSection,
    word: TwistWord,
}

impl Pipeline {
    pub fn new(input: Input, settings: Settings) -> Result<Pipeline, CliError> {
        let (factorization, word) = match &input {
            Input::Matrix(m) => {
                let f = rl_factorize(m)?;
                let section = FactorSection {
                    sign: f.word.sign(),
                    word: WordSummary::of(&f.word),
                    conjugator: f.conjugator,
                    source: "rl_factorize",
                };
                (section, f.word)
            }
            Input::Word(w) => {
                let section = FactorSection {
                    sign: w.sign(),
                    word: WordSummary::of(w),
                    conjugator: MatSL2::identity(),
                    source: "given",
                };
                (section, w.clone())
            }
        };
        Ok(Pipeline {
            input,
            settings,
            factorization,
            word,
        })
    }

    pub fn word(&self) -> &TwistWord {
        &self.word
    }

    fn matrix(&self) -> MatSL2 {
        match &self.input {
            Input::Matrix(m) => m.clone(),
            Input::Word(w) => w.to_matrix(),
        }
    }

    pub fn input_summary(&self) -> InputSummary {
        let m = self.matrix();
        InputSummary {
            kind: match self.input {
                Input::Matrix(_) => "matrix",
                Input::Word(_) => "word",
            },
            trace: m.trace().to_string(),
            matrix: m,
        }
    }

    pub fn notes(&self) -> Vec<String> {
        let mut notes = Vec::new();
        if self.word.sign() < 0 {
            notes.push(
                "negative trace: the word carries sign -1; paths, surfaces and guts depend only \
                 on the action on slopes, the triangulation uses the signed monodromy"
                    .to_string(),
            );
        }
        if let Input::Word(_) = self.input {
            notes.push("word input is used as given, without cyclic normalisation".to_string());
        }
        notes
    }

    pub fn factorization(&self) -> FactorSection {
        self.factorization.clone()
    }

    fn paths(&self) -> Result<Vec<EdgePath>, CliError> {
        Ok(minimal_paths_capped(&build_strip(&self.word), self.settings.max_paths)?)
    }

    pub fn strip(&self) -> Result<StripSection, CliError> {
        let strip = build_strip(&self.word);
        let n = strip.n();
        Ok(StripSection {
            n,
            triangle_count: strip.triangles().len(),
            triangles: strip.triangles().iter().map(|t| t.vertices().clone()).collect(),
            quotient_vertices: n,
            quotient_edges: 2 * n,
            path_count: self.paths()?.len(),
        })
    }

    pub fn surfaces_and_guts(&self) -> Result<(Vec<SurfaceSummary>, Vec<GutsEntry>), CliError> {
        let mut surfaces = Vec::new();
        let mut guts = Vec::new();
        for (i, p) in self.paths()?.iter().enumerate() {
            let s = build_surface(p, p.monodromy())?;
            let cells = |c: &ptbundle::surfaces::SurfaceComplex| CellCounts {
                vertices: c.vertex_count,
                edges: c.edges.len(),
                faces: c.faces,
            };
            let chi_s_gamma = s.s_gamma().chi;
            let vertices: Vec<Slope> = p.vertices()[..p.period()].to_vec();
            surfaces.push(SurfaceSummary {
                path: i,
                vertices: vertices.clone(),
                k: s.k,
                parity: Parity::of(s.k),
                chi: s.chi,
                sidedness: s.sided,
                boundary_components: s.boundary_components,
                cells: cells(&s),
                double: s.orientation_double().map(|d| DoubleSummary {
                    chi: d.chi,
                    sidedness: d.sided,
                    cells: cells(d),
                }),
                chi_s_gamma,
            });
            guts.push(GutsEntry {
                path: i,
                vertices,
                report: GutsReport::new(s.k, chi_s_gamma)?,
            });
        }
        Ok((surfaces, guts))
    }

    pub fn geometry(&self) -> Result<(TriangulationSection, GeometrySection, VolumeSection), CliError> {
        let t = build_layered_triangulation(&self.word)?;
        let classes: &[EdgeClass] = t.edge_classes();
        let triangulation = TriangulationSection {
            n: t.n(),
            edge_class_count: classes.len(),
            edge_classes: classes
                .iter()
                .map(|c| c.incidences.iter().map(|s| [s.tetrahedron, s.slot]).collect())
                .collect(),
        };
        let (angles, shapes) = solve_geometric(&t, self.settings.solver)?;
        let geometry = GeometrySection {
            angles: angles.angles.clone(),
            shapes: shapes.shapes.iter().map(|z| [z.re, z.im]).collect(),
            residual: shapes.residual,
            iterations: shapes.iterations,
        };
        let volume = VolumeSection {
            result: volume_with_tolerance(&angles, self.settings.bound),
            v3: v3(),
        };
        Ok((triangulation, geometry, volume))
    }

    pub fn report(&self) -> Result<AnalysisReport, CliError> {
        let (surfaces, guts) = self.surfaces_and_guts()?;
        let (triangulation, geometry, volume) = self.geometry()?;
        Ok(AnalysisReport {
            tool: TOOL,
            input: self.input_summary(),
            tolerances: self.settings.clone(),
            notes: self.notes(),
            factorization: self.factorization(),
            strip: self.strip()?,
            surfaces,
            guts,
            triangulation,
            geometry,
            volume,
        })
    }

    /// A document holding the common header and the requested sections.
    pub fn document(&self, sections: &[Section]) -> Result<Value, CliError> {
        let mut doc = Map::new();
        doc.insert("tool".into(), to_value(&TOOL));
        doc.insert("input".into(), to_value(&self.input_summary()));
        doc.insert("tolerances".into(), to_value(&self.settings));
        doc.insert("notes".into(), to_value(&self.notes()));
        let needs = |s: Section| sections.contains(&s);
        if needs(Section::Factorization) {
            doc.insert("factorization".into(), to_value(&self.factorization()));
        }
        if needs(Section::Strip) {
            doc.insert("strip".into(), to_value(&self.strip()?));
        }
        if needs(Section::Surfaces) || needs(Section::Guts) {
            let (surfaces, guts) = self.surfaces_and_guts()?;
            if needs(Section::Surfaces) {
                doc.insert("surfaces".into(), to_value(&surfaces));
            }
            if needs(Section::Guts) {
                doc.insert("guts".into(), to_value(&guts));
            }
        }
        if needs(Section::Triangulation) || needs(Section::Geometry) || needs(Section::Volume) {
            let (t, g, v) = self.geometry()?;
            if needs(Section::Triangulation) {
                doc.insert("triangulation".into(), to_value(&t));
            }
            if needs(Section::Geometry) {
                doc.insert("geometry".into(), to_value(&g));
            }
            if needs(Section::Volume) {
                doc.insert("volume".into(), to_value(&v));
            }
        }
        Ok(Value::Object(doc))
    }
}

/// Full analysis of one input.
pub fn analyze(input: Input, settings: &Settings) -> Result<AnalysisReport, CliError> {
    Pipeline::new(input, settings.clone())?.report()
}

/// Serializes with reals rounded to 15 significant digits; object keys
/// come out sorted.
pub fn to_value<T: Serialize>(x: &T) -> Value {
    round_reals(serde_json::to_value(x).expect("report types serialize"))
}

fn round_reals(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            let rounded: f64 = format!("{x:.14e}").parse().expect("formatted float");
            serde_json::Number::from_f64(rounded)
                .map(Value::Number)
                .unwrap_or(Value::Null)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_reals).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_reals(v))).collect()),
        other => other,
    }
}

/// Error document for a failed analysis.
pub fn error_value(e: &CliError) -> Value {
    serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string() } })
}
