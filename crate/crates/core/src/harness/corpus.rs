//! Test-function families sampled on the grid.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{read_dump, Domain, GridFunction};

/// Gaussian profiles are cut off at `3w`; the cutoff is flat up to `0.8 · 3w`.
const GAUSSIAN_REACH: f64 = 3.0;
const GAUSSIAN_FLAT: f64 = 0.8;
const FOURIER_FLAT: f64 = 0.5;
/// Oscillating families may carry at most `n / 16` cycles across the box.
const CYCLES_PER_POINT: f64 = 1.0 / 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bump {
    #[serde(default)]
    pub center: Center,
    pub width: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

/// A point given as `[x]` or `[x, y]`; missing coordinates are 0.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Center(pub [f64; 2]);

impl Serialize for Center {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Center {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        match v.as_slice() {
            [a] => Ok(Center([*a, 0.0])),
            [a, b] => Ok(Center([*a, *b])),
            _ => Err(serde::de::Error::custom(
                "center needs one or two coordinates",
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    GaussianBump {
        #[serde(default)]
        center: Center,
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Constant `amplitude` on `|x - c| <= radius - transition`, smoothly
    /// decaying to 0 at `radius`.
    SmoothPlateau {
        #[serde(default)]
        center: Center,
        radius: f64,
        transition: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Gaussian bump times `cos(2π f (x₁ - c₁) + φ)`.
    ModulatedBump {
        #[serde(default)]
        center: Center,
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    MultiBump {
        bumps: Vec<Bump>,
    },
    /// Gaussian bump centred on the grid point nearest `center`, so the
    /// sampled peak is exactly `amplitude` at every width.
    Concentration {
        #[serde(default)]
        center: Center,
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Seeded sum of `modes` plane waves with frequencies up to
    /// `max_frequency` (cycles per unit length), times a smooth cutoff.
    RandomFourier {
        #[serde(default)]
        center: Center,
        radius: f64,
        modes: usize,
        max_frequency: f64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// Values read from a grid dump; the dump's grid must equal the run grid.
    GridDump {
        path: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub id: String,
    #[serde(flatten)]
    pub family: Family,
}

/// `1` on `[0, a]`, `0` on `[1, ∞)`, `C^∞` in between.
pub fn smooth_step(t: f64, a: f64) -> f64 {
    if t <= a {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let s = (t - a) / (1.0 - a);
    let f = |z: f64| if z > 0.0 { (-1.0 / z).exp() } else { 0.0 };
    let (x, y) = (f(1.0 - s), f(s));
    x / (x + y)
}

fn dist(x: [f64; 2], c: [f64; 2], dim: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..dim {
        acc += (x[i] - c[i]).powi(2);
    }
    acc.sqrt()
}

fn gaussian(x: [f64; 2], c: [f64; 2], w: f64, a: f64, dim: usize) -> f64 {
    let r = dist(x, c, dim);
    let cut = smooth_step(r / (GAUSSIAN_REACH * w), GAUSSIAN_FLAT);
    if cut == 0.0 {
        0.0
    } else {
        a * (-(r * r) / (2.0 * w * w)).exp() * cut
    }
}

/// Plane waves of one random-Fourier function.
#[derive(Debug, Clone)]
struct Waves {
    modes: Vec<([f64; 2], f64, f64)>,
}

impl Waves {
    fn new(dim: usize, modes: usize, max_frequency: f64, amplitude: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let norm = amplitude / (modes.max(1) as f64).sqrt();
        let modes = (0..modes)
            .map(|_| {
                let (r, t): (f64, f64) = (rng.gen_range(0.0..=1.0), rng.gen_range(0.0..2.0 * PI));
                let f = max_frequency * r.sqrt();
                let xi = if dim == 1 {
                    [if t < PI { f } else { -f }, 0.0]
                } else {
                    [f * t.cos(), f * t.sin()]
                };
                let phase = rng.gen_range(0.0..2.0 * PI);
                let amp = norm * rng.gen_range(-1.0..=1.0);
                (xi, phase, amp)
            })
            .collect();
        Self { modes }
    }

    fn eval(&self, x: [f64; 2]) -> f64 {
        self.modes
            .iter()
            .map(|(xi, ph, a)| a * (2.0 * PI * (xi[0] * x[0] + xi[1] * x[1]) + ph).cos())
            .sum()
    }
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::GaussianBump { .. } => "gaussian_bump",
            Family::SmoothPlateau { .. } => "smooth_plateau",
            Family::ModulatedBump { .. } => "modulated_bump",
            Family::MultiBump { .. } => "multi_bump",
            Family::Concentration { .. } => "concentration",
            Family::RandomFourier { .. } => "random_fourier",
            Family::GridDump { .. } => "grid_dump",
        }
    }

    /// Dumps carry no analytic form and cannot be resampled at another scale.
    pub fn supports_dilation(&self) -> bool {
        !matches!(self, Family::GridDump { .. })
    }

    /// `u(x / s)`. Grid dumps are returned unchanged.
    pub fn dilate(&self, s: f64) -> Self {
        let sc = |c: &Center| Center([c.0[0] * s, c.0[1] * s]);
        match self {
            Family::GaussianBump {
                center,
                width,
                amplitude,
            } => Family::GaussianBump {
                center: sc(center),
                width: width * s,
                amplitude: *amplitude,
            },
            Family::SmoothPlateau {
                center,
                radius,
                transition,
                amplitude,
            } => Family::SmoothPlateau {
                center: sc(center),
                radius: radius * s,
                transition: transition * s,
                amplitude: *amplitude,
            },
            Family::ModulatedBump {
                center,
                width,
                amplitude,
                frequency,
                phase,
            } => Family::ModulatedBump {
                center: sc(center),
                width: width * s,
                amplitude: *amplitude,
                frequency: frequency / s,
                phase: *phase,
            },
            Family::MultiBump { bumps } => Family::MultiBump {
                bumps: bumps
                    .iter()
                    .map(|b| Bump {
                        center: sc(&b.center),
                        width: b.width * s,
                        amplitude: b.amplitude,
                    })
                    .collect(),
            },
            Family::Concentration {
                center,
                width,
                amplitude,
            } => Family::Concentration {
                center: sc(center),
                width: width * s,
                amplitude: *amplitude,
            },
            Family::RandomFourier {
                center,
                radius,
                modes,
                max_frequency,
                amplitude,
                seed,
            } => Family::RandomFourier {
                center: sc(center),
                radius: radius * s,
                modes: *modes,
                max_frequency: max_frequency / s,
                amplitude: *amplitude,
                seed: *seed,
            },
            Family::GridDump { .. } => self.clone(),
        }
    }

    /// Balls `(centre, radius)` that together contain the support.
    fn support(&self) -> Vec<([f64; 2], f64)> {
        match self {
            Family::GaussianBump { center, width, .. }
            | Family::ModulatedBump { center, width, .. }
            | Family::Concentration { center, width, .. } => {
                vec![(center.0, GAUSSIAN_REACH * width)]
            }
            Family::SmoothPlateau { center, radius, .. }
            | Family::RandomFourier { center, radius, .. } => vec![(center.0, *radius)],
            Family::MultiBump { bumps } => bumps
                .iter()
                .map(|b| (b.center.0, GAUSSIAN_REACH * b.width))
                .collect(),
            Family::GridDump { .. } => Vec::new(),
        }
    }

    fn check_params(&self, id: &str, domain: &Domain) -> Result<()> {
        let bad = |msg: String| Error::Config(format!("corpus function '{id}': {msg}"));
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(bad(format!("{name} = {v} must be positive")))
            }
        };
        let cycles = |f: f64| -> Result<()> {
            let across = f.abs() * 2.0 * domain.half_width();
            let cap = domain.points_per_axis() as f64 * CYCLES_PER_POINT;
            if across > cap * (1.0 + 1e-12) {
                Err(bad(format!(
                    "frequency {f} gives {across} cycles across the box, above n/16 = {cap}"
                )))
            } else {
                Ok(())
            }
        };
        match self {
            Family::GaussianBump { width, .. } | Family::Concentration { width, .. } => {
                positive("width", *width)?
            }
            Family::SmoothPlateau {
                radius, transition, ..
            } => {
                positive("radius", *radius)?;
                positive("transition", *transition)?;
                if transition > radius {
                    return Err(bad("transition exceeds radius".into()));
                }
            }
            Family::ModulatedBump {
                width, frequency, ..
            } => {
                positive("width", *width)?;
                cycles(*frequency)?;
            }
            Family::MultiBump { bumps } => {
                if !(2..=5).contains(&bumps.len()) {
                    return Err(bad(format!("needs 2 to 5 bumps, got {}", bumps.len())));
                }
                for b in bumps {
                    positive("width", b.width)?;
                }
            }
            Family::RandomFourier {
                radius,
                modes,
                max_frequency,
                ..
            } => {
                positive("radius", *radius)?;
                if *modes == 0 {
                    return Err(bad("modes must be at least 1".into()));
                }
                positive("max_frequency", *max_frequency)?;
                cycles(*max_frequency)?;
            }
            Family::GridDump { .. } => {}
        }
        let limit = domain.half_width() - domain.support_margin();
        for (c, r) in self.support() {
            for (axis, x) in c.iter().take(domain.dim()).enumerate() {
                if x.abs() + r > limit {
                    return Err(Error::MarginViolation(format!(
                        "corpus function '{id}' ({}): support reaches |x_{}| = {} beyond L - m = {limit}",
                        self.name(),
                        axis + 1,
                        x.abs() + r
                    )));
                }
            }
        }
        Ok(())
    }

    /// Samples the family on `domain`. `seed` feeds random families without
    /// an explicit seed.
    pub fn sample(&self, id: &str, domain: &Domain, seed: u64) -> Result<GridFunction> {
        self.check_params(id, domain)?;
        let dim = domain.dim();
        let u = match self {
            Family::GaussianBump {
                center,
                width,
                amplitude,
            } => {
                GridFunction::from_fn(*domain, |x| gaussian(x, center.0, *width, *amplitude, dim))?
            }
            Family::SmoothPlateau {
                center,
                radius,
                transition,
                amplitude,
            } => {
                let flat = (radius - transition) / radius;
                GridFunction::from_fn(*domain, |x| {
                    amplitude * smooth_step(dist(x, center.0, dim) / radius, flat)
                })?
            }
            Family::ModulatedBump {
                center,
                width,
                amplitude,
                frequency,
                phase,
            } => GridFunction::from_fn(*domain, |x| {
                let g = gaussian(x, center.0, *width, *amplitude, dim);
                g * (2.0 * PI * frequency * (x[0] - center.0[0]) + phase).cos()
            })?,
            Family::MultiBump { bumps } => GridFunction::from_fn(*domain, |x| {
                bumps
                    .iter()
                    .map(|b| gaussian(x, b.center.0, b.width, b.amplitude, dim))
                    .sum()
            })?,
            Family::Concentration {
                center,
                width,
                amplitude,
            } => {
                let c = domain.point(domain.nearest(center.0));
                GridFunction::from_fn(*domain, |x| gaussian(x, c, *width, *amplitude, dim))?
            }
            Family::RandomFourier {
                center,
                radius,
                modes,
                max_frequency,
                amplitude,
                seed: own,
            } => {
                let waves =
                    Waves::new(dim, *modes, *max_frequency, *amplitude, own.unwrap_or(seed));
                GridFunction::from_fn(*domain, |x| {
                    let cut = smooth_step(dist(x, center.0, dim) / radius, FOURIER_FLAT);
                    if cut == 0.0 {
                        0.0
                    } else {
                        waves.eval(x) * cut
                    }
                })?
            }
            Family::GridDump { path } => {
                let u = read_dump(Path::new(path))?;
                if u.domain() != domain {
                    let d = u.domain();
                    return Err(Error::Config(format!(
                        "corpus function '{id}': dump {path} has grid N={} n={} L={} m={}, the run uses N={} n={} L={} m={}",
                        d.dim(),
                        d.points_per_axis(),
                        d.half_width(),
                        d.support_margin(),
                        domain.dim(),
                        domain.points_per_axis(),
                        domain.half_width(),
                        domain.support_margin()
                    )));
                }
                u
            }
        };
        u.check_margin()?;
        Ok(u)
    }
}

impl CorpusSpec {
    pub fn new(id: &str, family: Family) -> Self {
        Self {
            id: id.to_string(),
            family,
        }
    }

    /// Seed for random families: the entry's own seed, else one derived from
    /// the run seed and the id.
    pub fn effective_seed(&self, run_seed: u64) -> u64 {
        let digest = Sha256::digest(self.id.as_bytes());
        let mut b = [0u8; 8];
        b.copy_from_slice(&digest[..8]);
        run_seed ^ u64::from_le_bytes(b)
    }

    pub fn sample(&self, domain: &Domain, run_seed: u64) -> Result<GridFunction> {
        self.family
            .sample(&self.id, domain, self.effective_seed(run_seed))
    }

    pub fn dilate(&self, s: f64) -> Self {
        Self {
            id: self.id.clone(),
            family: self.family.dilate(s),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub spec: CorpusSpec,
    pub function: GridFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub family: Family,
    pub sha256: String,
    pub max_abs: f64,
    pub file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    #[serde(rename = "N")]
    pub dim: usize,
    pub n: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
    pub m: f64,
    pub functions: Vec<ManifestEntry>,
}

/// SHA-256 of the little-endian value bytes.
pub fn values_hash(u: &GridFunction) -> String {
    let mut h = Sha256::new();
    for v in u.values() {
        h.update(v.to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn generate_corpus(
    specs: &[CorpusSpec],
    domain: &Domain,
    seed: u64,
) -> Result<(Vec<CorpusEntry>, Manifest)> {
    let mut ids = std::collections::BTreeSet::new();
    for s in specs {
        if !ids.insert(s.id.as_str()) {
            return Err(Error::Config(format!("duplicate corpus id '{}'", s.id)));
        }
    }
    let mut entries = Vec::with_capacity(specs.len());
    let mut functions = Vec::with_capacity(specs.len());
    for spec in specs {
        let u = spec.sample(domain, seed)?;
        functions.push(ManifestEntry {
            id: spec.id.clone(),
            family: spec.family.clone(),
            sha256: values_hash(&u),
            max_abs: u.max_abs(),
            file: None,
        });
        entries.push(CorpusEntry {
            spec: spec.clone(),
            function: u,
        });
    }
    let manifest = Manifest {
        seed,
        dim: domain.dim(),
        n: domain.points_per_axis(),
        half_width: domain.half_width(),
        m: domain.support_margin(),
        functions,
    };
    Ok((entries, manifest))
}

/// Eleven functions covering smooth, plateau, oscillating, clustered,
/// concentrating and random profiles. Supports fit `L = 4, m = 0.5`.
pub fn default_corpus() -> Vec<CorpusSpec> {
    let c = |x: f64, y: f64| Center([x, y]);
    vec![
        CorpusSpec::new(
            "gauss_w050",
            Family::GaussianBump {
                center: c(0.0, 0.0),
                width: 0.5,
                amplitude: 1.0,
            },
        ),
        CorpusSpec::new(
            "gauss_w025_off",
            Family::GaussianBump {
                center: c(0.7, -0.4),
                width: 0.25,
                amplitude: 1.5,
            },
        ),
        CorpusSpec::new(
            "gauss_w100",
            Family::GaussianBump {
                center: c(0.0, 0.0),
                width: 1.0,
                amplitude: 1.0,
            },
        ),
        CorpusSpec::new(
            "plateau_r150",
            Family::SmoothPlateau {
                center: c(0.0, 0.0),
                radius: 1.5,
                transition: 0.6,
                amplitude: 1.0,
            },
        ),
        CorpusSpec::new(
            "plateau_r080_off",
            Family::SmoothPlateau {
                center: c(-0.5, 0.9),
                radius: 0.8,
                transition: 0.4,
                amplitude: -0.7,
            },
        ),
        CorpusSpec::new(
            "modulated_w060",
            Family::ModulatedBump {
                center: c(0.0, 0.0),
                width: 0.6,
                amplitude: 1.0,
                frequency: 0.5,
                phase: 0.3,
            },
        ),
        CorpusSpec::new(
            "multi_bump3",
            Family::MultiBump {
                bumps: vec![
                    Bump {
                        center: c(-1.5, 0.5),
                        width: 0.3,
                        amplitude: 1.0,
                    },
                    Bump {
                        center: c(1.0, -1.0),
                        width: 0.4,
                        amplitude: -0.8,
                    },
                    Bump {
                        center: c(0.8, 1.6),
                        width: 0.25,
                        amplitude: 0.6,
                    },
                ],
            },
        ),
        CorpusSpec::new(
            "concentration_w050",
            Family::Concentration {
                center: c(0.0, 0.0),
                width: 0.5,
                amplitude: 1.0,
            },
        ),
        CorpusSpec::new(
            "concentration_w025",
            Family::Concentration {
                center: c(0.0, 0.0),
                width: 0.25,
                amplitude: 1.0,
            },
        ),
        CorpusSpec::new(
            "fourier_r250",
            Family::RandomFourier {
                center: c(0.0, 0.0),
                radius: 2.5,
                modes: 6,
                max_frequency: 0.5,
                amplitude: 1.0,
                seed: Some(7),
            },
        ),
        CorpusSpec::new(
            "fourier_r200_runseed",
            Family::RandomFourier {
                center: c(0.3, 0.2),
                radius: 2.0,
                modes: 4,
                max_frequency: 0.4,
                amplitude: 1.0,
                seed: None,
            },
        ),
    ]
}
